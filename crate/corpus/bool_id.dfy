method bool_id(a: bool, b: bool) returns (r: bool)
  ensures r == (a && b)
{
  r := a && b;
}
